import sys

from rcslab.cli import main

sys.exit(main())
