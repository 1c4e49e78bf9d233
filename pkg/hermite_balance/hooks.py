app_name = "hermite_balance"
app_title = "Hermite Balance"
app_publisher = "Hermite Balance Developers"
app_description = "Interpolation-based regularity criterion for probability laws"
app_license = "mit"

# Resource caps
# ------------------
# defaults for the "caps" block of an experiment config

default_caps = {
	"max_paths": 1_000_000,
	"max_grid": 4096,
	"max_realizations": 100_000,
}

# parameter name -> cap it is checked against
cap_params = {
	"n_paths": "max_paths",
	"n_particles": "max_paths",
	"n_real": "max_realizations",
	"nx": "max_grid",
	"grid": "max_grid",
	"nodes": "max_grid",
}

# Experiment kinds
# ------------------
# kind -> runner (dotted path), parameter schema name -> (type, default), description
# types: int, float, str, bool, int?, list[int], list[float], list[list[int]], list[list[float]]

experiment_kinds = {
	"orlicz-check": {
		"runner": "hermite_balance.api.experiments.orlicz_check",
		"description": "Luxembourg norm against closed-form L^p, Hoelder defect, beta_e growth of the entropy function",
		"params": {
			"cases": ("int", 20),
			"p_range": ("list[float]", [1.2, 4.0]),
			"holder_cases": ("int", 100),
			"t_range": ("list[float]", [1e3, 1e12]),
			"t_points": ("int", 10),
		},
	},
	"hermite-verify": {
		"runner": "hermite_balance.api.experiments.hermite_verify",
		"description": "Hermite orthonormality, partition of unity, eigen-residual order, block kernel bounds, reconstruction",
		"params": {
			"n_max": ("int", 64),
			"nodes": ("int", 129),
			"grid": ("int", 1201),
			"levels": ("int", 5),
			"alphas": ("list[int]", [0, 1]),
			"k_values": ("list[int]", [0, 2, 4]),
			"reconstruction_levels": ("int", 6),
		},
	},
	"mollify-rates": {
		"runner": "hermite_balance.api.experiments.mollify_rates",
		"description": "Super-kernel smoothing distance and norm growth rates along delta on a Gaussian",
		"params": {
			"cases": ("list[list[int]]", [[1, 1, 3], [0, 2, 2]]),
			"deltas": ("list[float]", [0.4, 0.2, 0.1, 0.05]),
			"grid": ("int", 1601),
			"e": ("str", "power(2)"),
		},
	},
	"balance-verdict": {
		"runner": "hermite_balance.api.experiments.balance_verdict",
		"description": "pi-functional verdict on a Gaussian or point-mass target, with the Fourier baseline",
		"params": {
			"model": ("str", "gaussian"),
			"levels": ("int", 6),
			"q": ("int", 0),
			"k": ("int", 1),
			"m": ("int", 1),
			"e": ("str", "power(2)"),
			"a": ("float", 2.0),
			"grid": ("int", 1201),
			"h": ("float", 1.0),
			"fourier_k": ("int", 1),
		},
	},
	"interp-props": {
		"runner": "hermite_balance.api.experiments.interp_props",
		"description": "Norm equivalence, balance-space inclusion witnesses and the level inequality on the diagonal pair",
		"params": {
			"samples": ("int", 100),
			"N": ("int", 5),
			"theta": ("float", 1.0),
			"m": ("int", 1),
			"a": ("float", 2.0),
			"norm_a": ("float", 0.0),
			"elements": ("int", 10),
			"la_levels": ("int", 60),
		},
	},
	"ibp-density": {
		"runner": "hermite_balance.api.experiments.ibp_density",
		"description": "Poisson-kernel density estimates from IBP weights against closed-form Gaussian densities",
		"params": {
			"n_particles": ("int", 1_000_000),
			"points": ("list[list[float]]", [[0.0, 0.0], [1.0, 0.0]]),
			"mixture": ("bool", True),
			"identity_order": ("int", 1),
		},
	},
	"sde-elliptic": {
		"runner": "hermite_balance.api.experiments.sde_elliptic",
		"description": "Localized regularity verdict for an elliptic SDE with log-modulus coefficients",
		"params": {
			"d": ("int", 1),
			"h": ("float", 1.0),
			"q": ("int", 0),
			"k": ("int", 1),
			"m": ("int?", None),
			"e": ("str", "log_entropy"),
			"a": ("float", 1.05),
			"r": ("float", 2.0),
			"y0": ("list[float]", [0.0]),
			"T": ("float", 1.0),
			"delta_grid": ("list[float]", [0.2 * 2.0**-j for j in range(7)]),
			"n_paths": ("int", 20_000),
			"dt": ("float", 0.01),
			"lemma10": ("bool", True),
		},
	},
	"sde-hormander": {
		"runner": "hermite_balance.api.experiments.sde_hormander",
		"description": "Hoermander route on the kinetic pair, cross-checked against its explicit Gaussian law",
		"params": {
			"T": ("float", 1.0),
			"q": ("int", 0),
			"k": ("int", 1),
			"m": ("int", 1),
			"e": ("str", "power(2)"),
			"a": ("float", 1.05),
			"r": ("float", 1.0),
			"delta_grid": ("list[float]", [0.2 * 2.0**-j for j in range(7)]),
			"n_paths": ("int", 20_000),
			"dt": ("float", 0.01),
		},
	},
	"heat": {
		"runner": "hermite_balance.api.experiments.heat",
		"description": "Stochastic heat equation on [0, 1]: window decomposition moments and the multi-point verdict",
		"params": {
			"model": ("str", "c_log"),
			"h": ("float", 1.0),
			"points": ("list[float]", [0.3, 0.7]),
			"T": ("float", 0.25),
			"eps_grid": ("list[float]", [0.05 * 2.0**-j for j in range(8)]),
			"bounds_eps": ("list[float]", [1e-5, 1e-4, 1e-3, 1e-2]),
			"n_real": ("int", 10_000),
			"nx": ("int", 128),
			"q": ("int", 0),
			"k": ("int", 1),
			"m": ("int?", None),
			"e": ("str", "log_entropy"),
			"a": ("float", 1.05),
			"moments": ("bool", True),
		},
	},
}
