"""User-story to pseudocode toolkit.

Two-stage pipeline: a retrieval engine maps a story to code over a task
corpus (stage 1), then either a rule table or a small trained
transformer converts the code to pseudocode (stage 2). A from-scratch
BLEU harness scores both stages.
"""

__version__ = "0.1.0"
