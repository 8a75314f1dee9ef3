import os
from dotenv import load_dotenv

load_dotenv()

BASE_SEED = int(os.getenv("SATLORA_BASE_SEED", "1"))
WORKERS = int(os.getenv("SATLORA_WORKERS", "1"))

OUTPUT_DIR = os.getenv("SATLORA_OUTPUT_DIR", "results")
LOG_LEVEL = os.getenv("SATLORA_LOG_LEVEL", "INFO").upper()

DURATION_S = float(os.getenv("SATLORA_DURATION_S", "600"))
REPLICATIONS = int(os.getenv("SATLORA_REPLICATIONS", "10"))

# Speed of light [m/s]
SPEED_OF_LIGHT = 299_792_458.0
