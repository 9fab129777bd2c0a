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


import json
import logging
import numpy as np
from struct import pack, unpack
from collections import OrderedDict

from errors import CheckpointError
from communication.writer import temp_path, commit

log = logging.getLogger('particle-push')

MAGIC = b'PPUSHCKP'
FORMAT_VERSION = 1
PAYLOAD_DTYPE = '<f4'

# Layout: MAGIC | uint16 version | uint32 manifest length | manifest JSON | payloads
# Payloads follow the manifest order, little-endian float32, no padding.


def save_checkpoint(file_name, groups, meta=None):
    """Write named parameter groups ({'actor': OrderedDict, ...}) to one file."""
    tensors = []
    payloads = []
    for group, params in groups.items():
        for name, value in params.items():
            value = np.asarray(value)
            if not np.all(np.isfinite(value)):
                raise CheckpointError('refusing to save non-finite tensor %s/%s' % (group, name))
            tensors.append({'name': '%s/%s' % (group, name), 'shape': list(value.shape), 'dtype': PAYLOAD_DTYPE})
            payloads.append(value.astype(PAYLOAD_DTYPE).tobytes())
    manifest = json.dumps({'meta': meta or {}, 'tensors': tensors}, sort_keys=True).encode('utf-8')

    temp_name = temp_path(file_name)
    with open(temp_name, 'wb') as file_to_write:
        file_to_write.write(MAGIC)
        file_to_write.write(pack('<HI', FORMAT_VERSION, len(manifest)))
        file_to_write.write(manifest)
        for payload in payloads:
            file_to_write.write(payload)
    commit(temp_name, file_name)
    log.info('Checkpoint written: %s (%d tensors)', file_name, len(tensors))


def _read_header(file_to_read, file_name):
    if file_to_read.read(len(MAGIC)) != MAGIC:
        raise CheckpointError('%s is not a particle-push checkpoint' % file_name)
    header = file_to_read.read(6)
    if len(header) != 6:
        raise CheckpointError('%s: truncated header' % file_name)
    version, length = unpack('<HI', header)
    if version != FORMAT_VERSION:
        raise CheckpointError('%s: unsupported checkpoint version %d' % (file_name, version))
    raw = file_to_read.read(length)
    if len(raw) != length:
        raise CheckpointError('%s: truncated manifest' % file_name)
    try:
        return json.loads(raw.decode('utf-8'))
    except ValueError as e:
        raise CheckpointError('%s: unreadable manifest: %s' % (file_name, e))


def read_manifest(file_name):
    """Manifest (meta and tensor list) without touching the payloads."""
    try:
        with open(file_name, 'rb') as file_to_read:
            return _read_header(file_to_read, file_name)
    except OSError as e:
        raise CheckpointError('cannot open checkpoint %s: %s' % (file_name, e))


def load_checkpoint(file_name):
    """Returns (groups, meta) with every tensor as a float64 array."""
    try:
        with open(file_name, 'rb') as file_to_read:
            manifest = _read_header(file_to_read, file_name)
            groups = OrderedDict()
            for entry in manifest['tensors']:
                if entry['dtype'] != PAYLOAD_DTYPE:
                    raise CheckpointError('%s: unsupported dtype %s' % (file_name, entry['dtype']))
                count = int(np.prod(entry['shape'], dtype=np.int64))
                raw = file_to_read.read(4 * count)
                if len(raw) != 4 * count:
                    raise CheckpointError('%s: truncated payload for %s' % (file_name, entry['name']))
                group, name = entry['name'].split('/', 1)
                value = np.frombuffer(raw, dtype=PAYLOAD_DTYPE).reshape(entry['shape']).astype(np.float64)
                groups.setdefault(group, OrderedDict())[name] = value
            if file_to_read.read(1):
                raise CheckpointError('%s: trailing bytes after the last tensor' % file_name)
    except OSError as e:
        raise CheckpointError('cannot open checkpoint %s: %s' % (file_name, e))
    return groups, manifest['meta']
