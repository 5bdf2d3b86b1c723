import sys
from pathlib import Path

# test-side oracles import as a plain module
sys.path.insert(0, str(Path(__file__).parent))
