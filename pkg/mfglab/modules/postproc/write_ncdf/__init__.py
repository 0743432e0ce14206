from .write_ncdf import (
	params,
	initialize,
	finalize,
	update
)
