import sys

from elmrules.cli import main

sys.exit(main())
