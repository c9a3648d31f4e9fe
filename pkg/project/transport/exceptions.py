# transport/exceptions.py
"""수치 라이브러리 공통 오류 정의. exit_code 는 배치 명령의 종료 코드로 그대로 쓰입니다."""


class TransportError(Exception):
    """모든 도메인 오류의 기본 클래스"""
    exit_code = 1


class DomainError(TransportError, ValueError):
    """입력이 정의역을 벗어남 (음수 차원, 0 이하 인자 등)"""
    exit_code = 2


class HypothesisViolation(DomainError):
    """정리의 가정 (delta 범위, alpha < 2 등) 위반"""
    exit_code = 2


class UnsupportedError(DomainError):
    """지원하지 않는 매개변수 (alpha = 2 커널, alpha > 2 등)"""
    exit_code = 2


class SingularPointError(DomainError):
    """alpha >= 1 에서 r = 1 커널 평가"""
    exit_code = 2


class CertificationFailure(TransportError):
    """격자 위에서 Re H <= 0 발견"""
    exit_code = 3


class InequalityViolation(TransportError):
    """가중 양성 부등식이 허용오차 이상으로 깨짐"""
    exit_code = 4


class NumericalInstability(TransportError):
    """NaN 발생. 그때까지의 trace 를 보존합니다."""
    exit_code = 5

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class CFLViolation(DomainError):
    """시간 간격이 CFL 조건을 넘음"""
    exit_code = 2


class DiagnosticError(TransportError):
    """진단에 필요한 표본이 부족함"""
    exit_code = 2


class OriginNotMaximumWarning(UserWarning):
    """u(0) 가 최대값이 아님 (폭발 범함수는 그대로 계산)"""
