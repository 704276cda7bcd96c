import sys

from hesynth.cli import main

sys.exit(main())
