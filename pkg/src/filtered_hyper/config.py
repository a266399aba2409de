from __future__ import annotations
import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

ROOT = Path(os.getenv("FHYPER_ROOT", Path(__file__).resolve().parents[2]))
load_dotenv(ROOT / ".env")

OUTPUT_DIR = Path(os.getenv("FHYPER_OUTPUT_DIR", ROOT / "results"))
RNG_ALGORITHM = "numpy-philox4x64-10"


@dataclass
class RuntimeFlags:
    threads: int = 1
    log_level: str = "WARNING"
    eval_chunk: int = 4096  # points per evaluation block


FLAGS = RuntimeFlags(
    threads=int(os.getenv("FHYPER_THREADS", str(os.cpu_count() or 1))),
    log_level=os.getenv("FHYPER_LOG_LEVEL", "WARNING").upper(),
    eval_chunk=int(os.getenv("FHYPER_EVAL_CHUNK", "4096")),
)
