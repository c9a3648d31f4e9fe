from django.db import models


class RunRecord(models.Model):
    """배치 명령 실행 기록 (설정, 판정, 산출물 위치)"""

    SUBCOMMAND_CHOICES = [
        ('kernel_table', '커널 표'),
        ('certify', 'Mellin 양성 인증'),
        ('inequality', '가중 부등식 검사'),
        ('simulate', '시뮬레이션'),
        ('burgers_oracle', 'Burgers 정확해'),
    ]

    VERDICT_CHOICES = [
        ('ok', '정상 종료'),
        ('completed', 't_end 도달'),
        ('blowup', '폭발 검출'),
        ('failed', '실패'),
    ]

    subcommand = models.CharField(max_length=32, choices=SUBCOMMAND_CHOICES, verbose_name='명령')
    manifest = models.JSONField(default=dict, verbose_name='실행 설정')
    verdict = models.CharField(max_length=16, choices=VERDICT_CHOICES, default='ok', verbose_name='판정')
    exit_code = models.IntegerField(default=0, verbose_name='종료 코드')
    output_dir = models.CharField(max_length=500, blank=True, verbose_name='산출물 폴더')
    summary = models.JSONField(default=dict, blank=True, verbose_name='요약')
    created_at = models.DateTimeField(auto_now_add=True, verbose_name='실행 시각')

    class Meta:
        verbose_name = '실행 기록'
        verbose_name_plural = '실행 기록 목록'
        ordering = ['-created_at', '-id']

    def __str__(self):
        return f"{self.subcommand} #{self.pk} ({self.verdict}, exit {self.exit_code})"
