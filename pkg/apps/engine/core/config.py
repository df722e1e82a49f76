import os
from pathlib import Path
from dotenv import load_dotenv

# Load a .env from the working directory if one exists
load_dotenv()

_PACKAGE_DIR = Path(__file__).resolve().parent.parent


class Settings:
    # App Configuration
    APP_NAME: str = os.getenv("SASAKIT_APP_NAME", "sasakit")
    VERSION: str = os.getenv("SASAKIT_VERSION", "1.0.0")

    # Logging
    LOG_LEVEL: str = os.getenv("SASAKIT_LOG_LEVEL", "WARNING")

    # Reports
    OUTPUT_FORMAT: str = os.getenv("SASAKIT_OUTPUT_FORMAT", "text")

    # Corpus mode
    MAX_WORKERS: int = int(os.getenv("SASAKIT_MAX_WORKERS", 4))

    # Floating lambda cross-check
    CROSSCHECK_TOLERANCE: float = float(os.getenv("SASAKIT_CROSSCHECK_TOLERANCE", 1e-9))

    # Shipped synthetic algebras
    RULES_DIR: Path = Path(os.getenv("SASAKIT_RULES_DIR", str(_PACKAGE_DIR / "rules")))


settings = Settings()
