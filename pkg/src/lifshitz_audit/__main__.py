import sys

from lifshitz_audit.cli import main

sys.exit(main())
