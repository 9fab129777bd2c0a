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


class ParticlePushError(Exception):
    """Base class for every error raised by particle-push."""


class ConfigError(ParticlePushError):
    """Invalid or unreadable configuration. Carries the 1-based line when known."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        if line is not None:
            where = '%s:%d' % (source or '<config>', line)
            message = '%s: %s' % (where, message)
        super().__init__(message)


class EntityError(ParticlePushError):
    pass


class PlacementError(ParticlePushError):
    pass


class GoalMismatchError(ParticlePushError):
    pass


class SetDistanceError(ParticlePushError):
    pass


class AttentionError(ParticlePushError):
    pass


class CheckpointError(ParticlePushError):
    pass


class DivergenceError(ParticlePushError):
    pass


class PremiseError(ParticlePushError):
    pass
