"""How fast does thresholding converge on smooth versus rough graphons?

Runs a small rate experiment for a few smoothness levels and prints the
fitted log-log slope next to the minimax exponent.  At these sizes the
threshold 4*sqrt(n) keeps very few components, so expect the fitted
slopes to wander away from theory; that is part of the story.
"""

from graphon_usvt.experiments import ExperimentConfig, run_rate_experiment


def main():
    for alpha in (1.25, 2.0, 3.0):
        cfg = ExperimentConfig(alpha=alpha, n_grid=(100, 200, 400, 800), replicates=5)
        res = run_rate_experiment(cfg)
        print(f"alpha={alpha}: slope {res.slope:+.3f} (theory {res.theory_slope:+.3f}, "
              f"R^2 {res.fit.r2:.2f})")
        for s in res.summary:
            print(f"    n={s.n:5d}  mean MSE {s.mean_mse:.5f}  mean rank {s.mean_rank:.1f}")


if __name__ == "__main__":
    main()
