"""Covering index coin(K) and weak covering index wcoin(K) of convex bodies."""
from .bodies import Ball, Body, BodyError, DirectSum, Disk, MinkowskiSum, Polygon, Segment, canonical, cube
from .calculus import coin_direct_sum, cylinder_coin, direct_sum_gamma, direct_sum_n_lambda, minkowski_upper
from .config import RunConfig
from .cover import CoverCertificate, Status, VerifyOutcome, verify_cover
from .gamma import gamma_estimate, n_lambda, step_function
from .index import coin, f_m, g_m, wcoin
from .intervals import Interval

__version__ = "0.1.0"
