from .picard import (
	params,
	initialize,
	finalize,
	update
)

dependencies = ["load_problem"]
