"""Output location shared by the demo scripts."""
from pathlib import Path

OUT = Path(__file__).resolve().parent / "_output"
OUT.mkdir(exist_ok=True)
