from .closed_loop import *
from .integrator import *
from .log_utils import *
from .metrics import get_metrics, compute_metrics, tabulate_metrics, Metrics, EmptyLogError
from .signals import *
