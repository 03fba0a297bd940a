import sys
from pathlib import Path

# Make tests/oracles.py and tests/helpers.py importable from any test module.
sys.path.insert(0, str(Path(__file__).parent))
