import logging
from logging.handlers import RotatingFileHandler
from typing import Optional

def setup_logging(level: str = "INFO", log_file: Optional[str] = "app.log"):
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.insert(0, RotatingFileHandler(
            log_file,
            maxBytes=10000000,
            backupCount=5
        ))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )
