"""Services that orchestrate the estimation pipeline and simulations."""
