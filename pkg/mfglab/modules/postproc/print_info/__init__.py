from .print_info import (
	params,
	initialize,
	finalize,
	update
)
