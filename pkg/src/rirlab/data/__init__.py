"""File I/O (WAV, tensor files) and synthetic room generation."""

from .tensorio import read_tensor, write_tensor
from .wavio import read_wav, write_wav
from .rooms import RoomSpec, gen_room, gen_rooms, make_reverberant, pseudo_embedding

__all__ = [
    "read_tensor",
    "write_tensor",
    "read_wav",
    "write_wav",
    "RoomSpec",
    "gen_room",
    "gen_rooms",
    "make_reverberant",
    "pseudo_embedding",
]
