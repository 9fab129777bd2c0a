# -*- coding: UTF-8 -*-

"""
 *
 *    Particle Push - entity-centric goal-conditioned RL on a planar push table
 *
 *    Copyright (C) 2026 Particle Push contributors
 *
 *    This program is free software: you can redistribute it and/or modify
 *    it under the terms of the GNU General Public License as published by
 *    the Free Software Foundation, either version 3 of the License, or
 *    any later version.
 *
 *    This program is distributed in the hope that it will be useful,
 *    but WITHOUT ANY WARRANTY; without even the implied warranty of
 *    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
 *    GNU General Public License for more details.
 *
 *    You should have received a copy of the GNU General Public License
 *    along with this program.  If not, see <https://www.gnu.org/licenses/>.
 *
 */
"""


import os
import csv
import json
import logging
import tempfile

import psutil
from collections import OrderedDict

log = logging.getLogger('particle-push')


def temp_path(file_name):
    """Temp file next to the destination, moved into place by the caller."""
    directory = os.path.dirname(os.path.abspath(file_name))
    os.makedirs(directory, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(prefix='.tmp_', dir=directory)
    os.close(fd)
    return temp_name


def commit(temp_name, file_name):
    # Rename is atomic under POSIX
    try:
        os.replace(temp_name, file_name)
    except OSError as e:
        log.error('Error while atomic write: %s', e)
        raise


def write_json(file_name, data):
    temp_name = temp_path(file_name)
    with open(temp_name, 'w', encoding='utf-8') as file_to_write:
        json.dump(data, file_to_write, indent=2, sort_keys=True)
        file_to_write.write('\n')
    commit(temp_name, file_name)
    log.debug('JSON file write successful: %s', file_name)


def write_jsonl(file_name, records):
    temp_name = temp_path(file_name)
    with open(temp_name, 'w', encoding='utf-8') as file_to_write:
        for record in records:
            file_to_write.write(json.dumps(record, sort_keys=True) + '\n')
    commit(temp_name, file_name)
    log.debug('JSONL file write successful: %s', file_name)


def write_csv(file_name, header, rows):
    temp_name = temp_path(file_name)
    with open(temp_name, 'w', encoding='utf-8', newline='') as file_to_write:
        writer = csv.writer(file_to_write)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[key] for key in header] if isinstance(row, dict) else row)
    commit(temp_name, file_name)
    log.debug('CSV file write successful: %s', file_name)


class JsonlStream:
    """Append-only JSONL stream, one flushed line per record."""

    def __init__(self, file_name, truncate=True):
        os.makedirs(os.path.dirname(os.path.abspath(file_name)), exist_ok=True)
        self.file_name = file_name
        self._file = open(file_name, 'w' if truncate else 'a', encoding='utf-8')

    def write(self, record):
        self._file.write(json.dumps(record, sort_keys=True) + '\n')
        self._file.flush()

    def close(self):
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_jsonl(file_name):
    with open(file_name, encoding='utf-8') as file_to_read:
        return [json.loads(line) for line in file_to_read if line.strip()]


def get_host_internals():
    """CPU, load and memory figures of the machine running the job."""
    values = OrderedDict()
    load_averages = psutil.getloadavg()
    values['CPU_Usage'] = psutil.cpu_percent()
    values['CPU_Count'] = psutil.cpu_count()
    values['SystemLoad_1mins'] = load_averages[0]
    values['SystemLoad_5mins'] = load_averages[1]
    values['SystemLoad_15mins'] = load_averages[2]

    ram = psutil.virtual_memory()
    values['RAM_Used'] = round(ram.used / 2**20, 2)       # MiB.
    values['RAM_Available'] = round(ram.available / 2**20, 2)
    values['RAM_Percent'] = ram.percent

    process = psutil.Process()
    values['Process_RSS'] = round(process.memory_info().rss / 2**20, 2)
    return values
