import math
from unittest import mock

import numpy as np
from django.contrib import admin
from django.db import DatabaseError
from django.test import TestCase
from django.urls import reverse

from transport.ledger import record_run
from transport.models import RunRecord


class RecordRunTest(TestCase):

    def test_numpy_values_are_stored_as_json(self):
        record = record_run('simulate', {'grid_n': np.int64(200), 'delta': np.float64(0.5)}, 'blowup', 10,
                            '/tmp/out', {'predicted_T_star': math.inf, 'ratios': np.array([1.0, 2.0]).tolist()})
        record.refresh_from_db()
        self.assertEqual(record.manifest, {'grid_n': 200, 'delta': 0.5})
        self.assertIsNone(record.summary['predicted_T_star'])
        self.assertEqual(record.output_dir, '/tmp/out')
        self.assertEqual(str(record), f"simulate #{record.pk} (blowup, exit 10)")

    def test_database_error_is_logged(self):
        with mock.patch.object(RunRecord.objects, 'create', side_effect=DatabaseError('no table')):
            with self.assertLogs('transport.ledger', level='WARNING'):
                self.assertIsNone(record_run('certify', {}, 'failed', 3))


class RunApiTest(TestCase):

    @classmethod
    def setUpTestData(cls):
        cls.kernel = RunRecord.objects.create(subcommand='kernel_table', verdict='ok', exit_code=0)
        cls.blowup = RunRecord.objects.create(subcommand='simulate', verdict='blowup', exit_code=10,
                                              summary={'detected_time': 0.8})
        cls.failed = RunRecord.objects.create(subcommand='simulate', verdict='failed', exit_code=5)

    def test_list(self):
        response = self.client.get(reverse('run_list'))
        self.assertEqual(response.status_code, 200)
        self.assertEqual([row['id'] for row in response.json()],
                         [self.failed.pk, self.blowup.pk, self.kernel.pk])

    def test_filters(self):
        response = self.client.get(reverse('run_list'), {'subcommand': 'simulate', 'verdict': 'blowup'})
        rows = response.json()
        self.assertEqual(len(rows), 1)
        self.assertEqual(rows[0]['exit_code'], 10)

    def test_detail(self):
        response = self.client.get(reverse('run_detail', args=[self.blowup.pk]))
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()['summary'], {'detected_time': 0.8})

    def test_missing_record(self):
        response = self.client.get(reverse('run_detail', args=[9999]))
        self.assertEqual(response.status_code, 404)

    def test_read_only(self):
        response = self.client.post(reverse('run_list'), {'subcommand': 'certify'})
        self.assertEqual(response.status_code, 405)


class RunRecordAdminTest(TestCase):

    def test_registered_without_add(self):
        model_admin = admin.site._registry[RunRecord]
        self.assertFalse(model_admin.has_add_permission(None))
        self.assertIn('verdict_badge', model_admin.list_display)
