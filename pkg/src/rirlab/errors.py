"""Exception types shared across the toolkit."""


class RirlabError(Exception):
    """Raised for invalid inputs and unsatisfiable requests.

    The HTTP layer maps this to a 400 response; everything else
    (programming errors) is allowed to surface as-is.
    """
