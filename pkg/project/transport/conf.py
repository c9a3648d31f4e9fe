# transport/conf.py
from django.conf import settings

# settings.NONLOCAL 에 키가 없을 때 쓰는 값
DEFAULTS = {
    'THREADS': 1,
    'PROGRESS': False,
    'R_SWITCH': 0.7,
    'SERIES_TOL': 1e-12,
    'QUAD_ABS_TOL': 1e-10,
    'LAMBDA_MAX': 1e3,
    'LAMBDA_POINTS': 2000,
    'OUTPUT_DIR': 'runs',
}


def nonlocal_setting(key: str):
    """NONLOCAL 설정값 조회 (settings 미구성 상태에서도 기본값 반환)"""
    try:
        configured = getattr(settings, 'NONLOCAL', {})
    except Exception:
        configured = {}
    return configured.get(key, DEFAULTS[key])
