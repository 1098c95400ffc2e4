from libelcontrol import feasibility, simulation
from libelcontrol.config_utils import parse_config

experiment = parse_config('example_config/paper_sec5.yml', t_end=10.0, silent=True)

report = feasibility.check_c1(experiment.spec, experiment.refbounds, experiment.gains)
print(f'tau_min = {report.tau_min:.4f}, feasible: {report.feasible}')

print(feasibility.min_feasible('Q_bar', experiment.spec, experiment.refbounds, experiment.gains))

log, metrics = simulation.run(experiment.sim)
print(simulation.tabulate_metrics(metrics, 'proposed controller'))
print(log.to_frame()[['t', 'norm_e', 'norm_tau']].tail())
