from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('subcommand', models.CharField(choices=[('kernel_table', '커널 표'), ('certify', 'Mellin 양성 인증'), ('inequality', '가중 부등식 검사'), ('simulate', '시뮬레이션'), ('burgers_oracle', 'Burgers 정확해')], max_length=32, verbose_name='명령')),
                ('manifest', models.JSONField(default=dict, verbose_name='실행 설정')),
                ('verdict', models.CharField(choices=[('ok', '정상 종료'), ('completed', 't_end 도달'), ('blowup', '폭발 검출'), ('failed', '실패')], default='ok', max_length=16, verbose_name='판정')),
                ('exit_code', models.IntegerField(default=0, verbose_name='종료 코드')),
                ('output_dir', models.CharField(blank=True, max_length=500, verbose_name='산출물 폴더')),
                ('summary', models.JSONField(blank=True, default=dict, verbose_name='요약')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='실행 시각')),
            ],
            options={
                'verbose_name': '실행 기록',
                'verbose_name_plural': '실행 기록 목록',
                'ordering': ['-created_at', '-id'],
            },
        ),
    ]
