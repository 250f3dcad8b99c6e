import os

from dotenv import load_dotenv

load_dotenv()


class Config:
    SEED = int(os.environ.get('GWCACHE_SEED', '0'))
    RESTARTS = int(os.environ.get('GWCACHE_RESTARTS', '64'))
    SWEEP_RESTARTS = int(os.environ.get('GWCACHE_SWEEP_RESTARTS', '8'))
    MAX_ITERS = int(os.environ.get('GWCACHE_MAX_ITERS', '2000'))
    WORKERS = int(os.environ.get('GWCACHE_WORKERS', '1'))
    BLOCKLENGTH = int(os.environ.get('GWCACHE_BLOCKLENGTH', '100000'))
    LOG_LEVEL = os.environ.get('GWCACHE_LOG_LEVEL', 'WARNING')
