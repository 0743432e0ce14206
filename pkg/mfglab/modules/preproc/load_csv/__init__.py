from .load_csv import (
	params,
	initialize,
	finalize,
	update
)

dependencies = ["load_problem"]
