from rest_framework import status
from rest_framework.exceptions import APIException


class InvalidParameter(APIException):
    status_code = status.HTTP_400_BAD_REQUEST
    default_detail = "Invalid parameter"
    default_code = "invalid_parameter"


class DeletionTooLarge(APIException):
    status_code = status.HTTP_400_BAD_REQUEST
    default_detail = "deletion must leave at least one item"
    default_code = "deletion_too_large"


class UnsupportedPolicy(APIException):
    status_code = status.HTTP_400_BAD_REQUEST
    default_detail = "Deletion policy not supported here"
    default_code = "unsupported_policy"


class StateSpaceOverflow(APIException):
    status_code = status.HTTP_400_BAD_REQUEST
    default_detail = "Outcome space too large to enumerate"
    default_code = "state_space_overflow"


class EnumerationMismatch(APIException):
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR
    default_detail = "index sets of an i.i.d. sample gave different expectations"
    default_code = "enumeration_mismatch"


class MeanRequired(APIException):
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    default_detail = "finite mean required"
    default_code = "mean_required"


class VarianceRequired(APIException):
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    default_detail = "variance required"
    default_code = "variance_required"


class DivergentMoment(APIException):
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    default_detail = "Moment diverges"
    default_code = "divergent_moment"


class NonzeroMean(APIException):
    status_code = status.HTTP_422_UNPROCESSABLE_ENTITY
    default_detail = "zero-mean law required"
    default_code = "nonzero_mean"


def exit_status(exc):
    """Map an APIException to the process exit status of the lab commands."""
    if exc.status_code == status.HTTP_422_UNPROCESSABLE_ENTITY:
        return 3
    if status.is_server_error(exc.status_code):
        return 1
    return 2
