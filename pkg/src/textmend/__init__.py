"""Character-level adversarial attacks and probabilistic sentence restoration.

The restoration pipeline has three stages: per-token candidate matching with
a substring edit distance (building segmentation hypotheses), iterative
masked-context refinement of the per-slot word distributions, and
likelihood-based selection of the winning hypothesis.  The attack side
implements a suite of cognitively inspired character-level perturbations for
generating benchmark data.
"""

__version__ = "0.1.0"
