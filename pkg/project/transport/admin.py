from django.contrib import admin
from django.utils.html import format_html

from .models import RunRecord


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    """실행 기록 관리 (읽기 전용)"""
    list_display = ['id', 'subcommand', 'verdict_badge', 'exit_code', 'output_dir', 'created_at']
    list_filter = ['subcommand', 'verdict', 'exit_code', 'created_at']
    search_fields = ['output_dir']
    readonly_fields = ['subcommand', 'manifest', 'verdict', 'exit_code', 'output_dir', 'summary', 'created_at']

    fieldsets = (
        ('실행 정보', {
            'fields': ('subcommand', 'verdict', 'exit_code', 'output_dir', 'created_at')
        }),
        ('설정과 요약', {
            'fields': ('manifest', 'summary'),
            'classes': ('collapse',)
        }),
    )

    def verdict_badge(self, obj):
        colors = {'ok': 'green', 'completed': 'green', 'blowup': 'orange', 'failed': 'red'}
        return format_html('<span style="color: {};">{}</span>',
                           colors.get(obj.verdict, 'black'), obj.get_verdict_display())
    verdict_badge.short_description = '판정'

    def has_add_permission(self, request):
        return False
