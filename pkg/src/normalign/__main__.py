import sys

from normalign.cli import main

sys.exit(main())
