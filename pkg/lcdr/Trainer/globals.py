# CONSTANT VALUES

# one run seed is split into these independent streams, in this order
RNG_STREAMS = [
    "ivae_init",
    "lcvae_init",
    "shuffle",
    "ivae_noise",
    "lcvae_noise",
    "mf_init",
    "head_init",
    "rec_shuffle",
    "outcome_mc",
]

BRANCHES_JOINT = "joint"
BRANCHES_IVAE = "ivae"
BRANCHES_VAE = "vae"
BRANCHES = set([BRANCHES_JOINT, BRANCHES_IVAE, BRANCHES_VAE])

# relative improvement below this counts as a stalled epoch
CONVERGENCE_TOL = 1e-4

METHOD_LCDR = "lcdr"
METHOD_MF = "mf"
METHOD_MF_WF = "mf_wf"
METHOD_VAE_IVAE_CONCAT = "vae_ivae_concat"
METHOD_LCDR_WO_LC = "lcdr_wo_lc"
METHODS = [METHOD_LCDR, METHOD_MF, METHOD_MF_WF, METHOD_VAE_IVAE_CONCAT, METHOD_LCDR_WO_LC]
