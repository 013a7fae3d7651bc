"""Sentinels shared by the engine and the observable layer."""

UNPARKED = -1  # park_time / park_vertex: car has not parked
VACANT = -1  # occupied_at: spot with no car parked in it
NO_SPOT = -2  # occupied_at: vertex started as a car origin
