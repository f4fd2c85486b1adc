from pydantic_settings import BaseSettings
from pathlib import Path
from typing import Optional

class Settings(BaseSettings):
    API_V1_STR: str = "/api/v1"
    PROJECT_NAME: str = "Warehouse Task Allocation API"
    DATA_DIR: Path = Path("data")
    OUTPUT_DIR: Path = DATA_DIR / "output"
    LOG_FILE: Optional[str] = "app.log"
    LOG_LEVEL: str = "INFO"

    DEFAULT_LAMBDA: float = 0.1
    DEFAULT_ESTIMATOR: str = "warehouse"
    DEFAULT_GRAPH: str = "full"
    DEFAULT_GROUP_REQUEST: int = 50
    ENFORCE_WINDOWS: bool = True
    N_JOBS: int = -1

    class Config:
        case_sensitive = True

settings = Settings()
