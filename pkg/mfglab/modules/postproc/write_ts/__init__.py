from .write_ts import (
	params,
	initialize,
	finalize,
	update
)

dependencies = ["load_problem"]
