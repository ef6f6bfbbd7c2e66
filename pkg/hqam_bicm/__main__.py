import sys

from hqam_bicm.main import main

sys.exit(main())
