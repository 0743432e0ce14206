# no initialize: loading this monitor must fail validation
from .invalid_custom_module import params, update, finalize
