"""1-nearest-neighbour classification in projected space."""
import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatch, EmptyTrainingSet, LengthMismatch


def one_nn_predict(z_train, y_train, z_test):
    """Label of the Euclidean-nearest training column for each test column.

    Points are columns (``k x m`` and ``k x p``). Ties go to the lowest
    training index.
    """
    z_train = np.atleast_2d(np.asarray(z_train, dtype=float))
    z_test = np.atleast_2d(np.asarray(z_test, dtype=float))
    y_train = np.asarray(y_train).ravel()
    if z_train.shape[1] == 0 or y_train.size == 0:
        raise EmptyTrainingSet("1-NN needs at least one training point")
    if y_train.size != z_train.shape[1]:
        raise LengthMismatch(f"{y_train.size} labels for {z_train.shape[1]} training points")
    if z_train.shape[0] != z_test.shape[0]:
        raise DimensionMismatch(f"train dim {z_train.shape[0]} != test dim {z_test.shape[0]}")
    if z_test.shape[1] == 0:
        return y_train[:0].copy()
    dist = cdist(z_test.T, z_train.T, "sqeuclidean")
    # argmin returns the first minimum, which is the lowest training index
    return y_train[np.argmin(dist, axis=1)]


def accuracy(pred, truth):
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.size != truth.size:
        raise LengthMismatch(f"{pred.size} predictions vs {truth.size} labels")
    if pred.size == 0:
        raise LengthMismatch("accuracy of an empty label vector is undefined")
    return float(np.mean(pred == truth))
