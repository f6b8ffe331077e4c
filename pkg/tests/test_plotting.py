from kdvdg import harness as H
from kdvdg.plotting import plot_convergence, plot_evolution


def test_plot_convergence_several_reports(tmp_path):
    reps = [H.run_convergence("4.1", m, 2, [6, 12, 24]) for m in ("A", "C")]
    path = tmp_path / "conv.png"
    plot_convergence(reps, path)
    assert path.read_bytes()[:4] == b"\x89PNG"


def test_plot_evolution_pdf(tmp_path):
    res = H.run_evolution("4.4", "A", 2, 6, t_final=0.01)
    path = tmp_path / "evo.pdf"
    plot_evolution(res, path)
    assert path.read_bytes()[:4] == b"%PDF"
