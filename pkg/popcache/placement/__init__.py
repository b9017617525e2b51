from .transmitter import CachedPiece, TransmitterPlacement, pieces_per_file, place_transmitters
from .receiver import ReceiverPlacement, place_receivers
