from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    APP_NAME: str = "UDCD Lab"
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "json"  # json | plain

    # Numerical tolerances
    HERMITIAN_TOL: float = 1e-12
    UNITARY_TOL: float = 1e-10
    DEGENERACY_TOL: float = 1e-10  # relative to the spectral norm of H
    COUPLING_TOL: float = 1e-12  # relative to the largest |<m|dH|n>|
    # Relative to the largest spectral weight. Parity-allowed LMG lines reach
    # ~1e-14 of the leading weight; forbidden ones sit at roundoff (~1e-30).
    WEIGHT_THRESHOLD: float = 1e-20
    QUAD_EPSABS: float = 1e-12
    QUAD_LIMIT: int = 2000
    LSTSQ_RCOND: float = 1e-12

    SWEEP_WORKERS: int = 1
    OUTPUT_DIR: str = "out"

    model_config = {"env_file": ".env", "env_file_encoding": "utf-8", "extra": "ignore"}


settings = Settings()
