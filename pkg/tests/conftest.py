import sys
from pathlib import Path

# make tests/oracles importable as a package
sys.path.insert(0, str(Path(__file__).parent))
