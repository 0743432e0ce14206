from .write_csv import (
	params,
	initialize,
	finalize,
	update
)
