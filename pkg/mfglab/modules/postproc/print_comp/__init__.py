from .print_comp import (
	params,
	initialize,
	finalize,
	update
)
