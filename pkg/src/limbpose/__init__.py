"""Limb-pose estimation for infants from depth-video clips.

Two-stage pipeline: a 3-D convolutional detection network proposes rough
per-joint/per-connection affinity maps, a 3-D regression network refines
them into confidence maps, and a geometric linker assembles per-limb poses
by non-maximum suppression and bipartite matching on line integrals.
"""

__version__ = "0.1.0"
