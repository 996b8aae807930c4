from .simplex import SimplexObjective, bayes_project, fit_lip, objective_gradient, optimize

__all__ = ["SimplexObjective", "bayes_project", "fit_lip", "objective_gradient", "optimize"]
