from .plot2d import (
	params,
	initialize,
	finalize,
	update
)
