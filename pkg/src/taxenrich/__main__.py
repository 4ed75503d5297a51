import sys

from taxenrich.cli import main

sys.exit(main())
