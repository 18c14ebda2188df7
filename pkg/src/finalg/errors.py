"""Error taxonomy shared by all modules.

InputError covers malformed data and violated preconditions (CLI exit 2);
ResourceError covers exceeded size/arity caps (CLI exit 3).
"""


class InputError(ValueError):
    pass


class ResourceError(RuntimeError):
    pass
