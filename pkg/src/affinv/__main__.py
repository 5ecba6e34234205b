import sys

from affinv.expcli import main

sys.exit(main())
