import sys

from dyadic_sobolev.main import main

sys.exit(main())
