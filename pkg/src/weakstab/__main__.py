import sys

from weakstab.cli import main

sys.exit(main())
