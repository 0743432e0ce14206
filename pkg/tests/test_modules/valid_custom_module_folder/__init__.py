from .valid_custom_module import params, initialize, update, finalize
