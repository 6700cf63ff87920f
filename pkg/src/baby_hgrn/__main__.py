'''
Entry point for ``python -m baby_hgrn`` and the ``baby-hgrn`` script.
'''

import sys

from baby_hgrn.cli import main as cli_main


def main() -> None:
    '''Run the command line and exit with its status.'''
    sys.exit(cli_main())


if __name__ == '__main__':
    main()
