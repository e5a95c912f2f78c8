import os
from dotenv import load_dotenv
from pathlib import Path

load_dotenv()

LOGS_DIR = Path(os.getenv("LOGS_DIR", "./logs/"))
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

EARTH_RADIUS_M = 6_371_000.0

# Contiguous United States: lon_min, lat_min, lon_max, lat_max
DEFAULT_BBOX = tuple(float(v) for v in os.getenv("DEFAULT_BBOX", "-125,24,-66,50").split(","))

POOL_GRID_ROWS = int(os.getenv("POOL_GRID_ROWS", "25000"))
POOL_GRID_COLS = int(os.getenv("POOL_GRID_COLS", "50000"))
GPS_GRID_ROWS = int(os.getenv("GPS_GRID_ROWS", "100"))
GPS_GRID_COLS = int(os.getenv("GPS_GRID_COLS", "200"))

RADII_M = tuple(float(v) for v in os.getenv("RADII_M", "1000,2000,3000,4000,5000,6000,7000,8000,9000,10000").split(","))

MAP_PATCH_SIZE = int(os.getenv("MAP_PATCH_SIZE", "17"))
MAP_COUNT = int(os.getenv("MAP_COUNT", "10"))
VISUAL_CONCEPTS = int(os.getenv("VISUAL_CONCEPTS", "594"))

LEARNING_RATE = float(os.getenv("LEARNING_RATE", "0.1"))
MOMENTUM = float(os.getenv("MOMENTUM", "0.9"))
WEIGHT_DECAY = float(os.getenv("WEIGHT_DECAY", "0.005"))
EPOCHS = int(os.getenv("EPOCHS", "30"))
LR_STEP_EPOCHS = int(os.getenv("LR_STEP_EPOCHS", "10"))
LR_GAMMA = float(os.getenv("LR_GAMMA", "0.1"))
DROPOUT = float(os.getenv("DROPOUT", "0.5"))
BATCH_SIZE = int(os.getenv("BATCH_SIZE", "128"))
RADIUS_LR_MULT = float(os.getenv("RADIUS_LR_MULT", "1e6"))
RADIUS_INIT_JITTER = float(os.getenv("RADIUS_INIT_JITTER", "0.05"))

PRIOR_K = int(os.getenv("PRIOR_K", "100"))
PRIOR_RADIUS_M = float(os.getenv("PRIOR_RADIUS_M", "4000000"))
PRIOR_EPSILON = float(os.getenv("PRIOR_EPSILON", "1e-6"))

SELECT_GRID_ROWS = int(os.getenv("SELECT_GRID_ROWS", "100"))
SELECT_GRID_COLS = int(os.getenv("SELECT_GRID_COLS", "200"))
SELECT_ALPHA = float(os.getenv("SELECT_ALPHA", "0.01"))
SELECT_TOP_N = int(os.getenv("SELECT_TOP_N", "100"))
