# engine/config.py

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# --- Engine Configuration ---
LOG_LEVEL = os.getenv("GAMEOPT_LOG_LEVEL", "WARNING")
DUAL_GRID = int(os.getenv("GAMEOPT_DUAL_GRID", "8"))
VERIFY_GRID = int(os.getenv("GAMEOPT_VERIFY_GRID", "6"))
MAX_GRID_POINTS = int(os.getenv("GAMEOPT_MAX_GRID_POINTS", "20000"))
