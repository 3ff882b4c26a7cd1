from app.models.schemas.problem import *  # noqa: F401,F403
from app.models.schemas.solver import *  # noqa: F401,F403
from app.models.schemas.bench import *  # noqa: F401,F403
