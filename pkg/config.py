"""
Configuration file for dpols
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _flag(name: str) -> bool:
    return os.getenv(name, '0').strip().lower() in ('1', 'true', 'yes', 'on')


# Root seed of every subcommand
DEFAULT_SEED = int(os.getenv('DPOLS_SEED', '0'))

# Worker processes for trial loops
DEFAULT_WORKERS = int(os.getenv('DPOLS_WORKERS', '1'))

DEFAULT_LOG_LEVEL = os.getenv('DPOLS_LOG_LEVEL', 'WARNING')

# Privacy-honest mode: suppress diagnostics not covered by the guarantee
DEFAULT_STRICT_PRIVACY = _flag('DPOLS_STRICT_PRIVACY')

# Cross-check rank-one results against full recomputation
DEFAULT_DEBUG_CHECKS = _flag('DPOLS_DEBUG_CHECKS')

DEFAULT_OUTPUT_DIR = os.getenv('DPOLS_OUTPUT_DIR', 'output')

# Result file schema version
RESULTS_SCHEMA = 1

MANIFEST_NAME = 'manifest.jsonl'
