import numpy as np
import numpy.testing as npt
import pytest

from fitpick.errors import TrainingError
from fitpick.nn import Optimizer


def test_sgd_definition():
    opt = Optimizer("sgd", learning_rate=0.1)
    p = np.array([1.0])
    opt.step([p], [np.array([0.5])])
    npt.assert_allclose(p, [0.95])


def test_zero_gradient_keeps_params():
    opt = Optimizer("sgd", learning_rate=0.3)
    p = np.array([1.0, -2.0])
    opt.step([p], [np.zeros(2)])
    npt.assert_array_equal(p, [1.0, -2.0])


def test_adam_first_step_hand_computed():
    # independent recomputation of the standard update for one scalar step
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    g = 0.5
    m = (1 - b1) * g
    v = (1 - b2) * g * g
    m_hat = m / (1 - b1)
    v_hat = v / (1 - b2)
    expected = 1.0 - lr * m_hat / (np.sqrt(v_hat) + eps)

    opt = Optimizer("adam", learning_rate=lr, beta1=b1, beta2=b2, eps=eps)
    p = np.array([1.0])
    opt.step([p], [np.array([g])])
    npt.assert_allclose(p, [expected], rtol=0, atol=1e-15)


def test_momentum_accumulates():
    opt = Optimizer("sgd", learning_rate=1.0, momentum=0.5)
    p = np.array([0.0])
    opt.step([p], [np.array([1.0])])   # v=1, p=-1
    opt.step([p], [np.array([1.0])])   # v=1.5, p=-2.5
    npt.assert_allclose(p, [-2.5])


def test_nonfinite_gradient_names_parameter():
    opt = Optimizer("sgd", learning_rate=0.1)
    p = np.array([1.0])
    with pytest.raises(TrainingError, match="q.layer0.weights"):
        opt.step([p], [np.array([np.nan])], names=["q.layer0.weights"])


def test_invalid_learning_rate():
    with pytest.raises(ValueError):
        Optimizer("sgd", learning_rate=0.0)
