"""Prints the option table of flags.rst from main.add_all_arguments."""
import os
import sys
sys.path.insert(1, os.path.join(sys.path[0], '..', '..'))
import main


class FlagCollector:
    def __init__(self):
        self.flags = []

    def add_argument(self, *names, type=None, default=None, help=None,
                     action=None, choices=None, nargs=None, const=None, dest=None):
        name = ' '.join(names).replace('--', r'\-\-')
        description = (help or '').replace('%(default)s', str(default))
        if choices:
            description = f'{description}. One of {{{", ".join(choices)}}}'
        self.flags.append((name, f'{description}.'))


collector = FlagCollector()
# Keep this line in sync with the same one in main.py:get_config()
collector.add_argument('-c', '--config', help='Path to configuration file')
main.add_all_arguments(collector)

wn = max(len(name) for name, _ in collector.flags) + 4
wd = max(len(description) for _, description in collector.flags)
rule = f'{"=" * wn} {"=" * wd}'

print('..\n    Do not modify this table. It is generated by genflags.py.\n')
print(rule)
print(f'{"Name":<{wn}} Description')
print(rule)
for name, description in collector.flags:
    print(f'{name:<{wn}} {description}')
print(rule)
