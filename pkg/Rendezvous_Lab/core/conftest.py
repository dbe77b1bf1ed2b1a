"""Make the flat core/ modules importable by bare name under pytest."""

import sys
from pathlib import Path

core_dir = Path(__file__).parent
if str(core_dir) not in sys.path:
    sys.path.insert(0, str(core_dir))
