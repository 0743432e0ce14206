from .load_problem import (
	params,
	initialize,
	finalize,
	update
)
