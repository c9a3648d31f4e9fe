"""
Django settings for the nonlocal transport project.

수치 계산 기본값은 NONLOCAL 딕셔너리에 모아두고,
.env 또는 환경 변수로 덮어쓸 수 있습니다.
"""

from pathlib import Path

import os
import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

env = environ.Env(
    DEBUG=(bool, False),
    NONLOCAL_THREADS=(int, 1),
    NONLOCAL_PROGRESS=(bool, False),
    NONLOCAL_LOG_LEVEL=(str, 'INFO'),
)
environ.Env.read_env(os.path.join(BASE_DIR, '.env'))

# 배치 도구라서 SECRET_KEY 가 없어도 동작하도록 기본값을 둠
SECRET_KEY = env('SECRET_KEY', default='nonlocal-transport-local-key')
DEBUG = env('DEBUG')

ALLOWED_HOSTS = env.list('ALLOWED_HOSTS', default=['localhost', '127.0.0.1'])


# Application definition

INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',
    'transport',
    'rest_framework',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'project.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'project.wsgi.application'


# Database (실행 기록 RunRecord 저장용)

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}


# Internationalization

LANGUAGE_CODE = 'ko-kr'

TIME_ZONE = 'Asia/Seoul'

USE_I18N = True

USE_TZ = False


# Static files

STATIC_URL = 'static/'
STATIC_ROOT = os.path.join(BASE_DIR, 'static')

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# === 수치 계산 기본값 ===
NONLOCAL = {
    'THREADS': max(1, env('NONLOCAL_THREADS')),
    'PROGRESS': env('NONLOCAL_PROGRESS'),
    'R_SWITCH': 0.7,            # 급수 / 구적 전환 반지름
    'SERIES_TOL': 1e-12,        # 테일러 급수 절단 허용오차
    'QUAD_ABS_TOL': 1e-10,      # 적응 구적 절대 허용오차
    'LAMBDA_MAX': 1e3,
    'LAMBDA_POINTS': 2000,
    'OUTPUT_DIR': env('NONLOCAL_OUTPUT_DIR', default=str(BASE_DIR / 'runs')),
}


# === 로깅 ===
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'loggers': {
        'transport': {
            'handlers': ['console'],
            'level': env('NONLOCAL_LOG_LEVEL'),
            'propagate': False,
        },
    },
}


# REST Framework 설정 (실행 기록 조회 API, 읽기 전용)
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
}
