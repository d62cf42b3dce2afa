#!/usr/bin/env python3
"""Regenerate data/diabetes.csv and data/breast_cancer.csv from scikit-learn.

The CSV files are committed; this script is only needed to rebuild them.
"""
import csv
import pathlib

from sklearn.datasets import load_breast_cancer, load_diabetes


def write(path, names, X, y, label):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + [label])
        for row, target in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [repr(float(target)) if label == "progression" else int(target)])


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data"
    out.mkdir(exist_ok=True)
    d = load_diabetes(scaled=False)
    write(out / "diabetes.csv", d.feature_names, d.data, d.target, "progression")
    b = load_breast_cancer()
    names = [n.replace(" ", "_") for n in b.feature_names]
    write(out / "breast_cancer.csv", names, b.data, b.target, "benign")


if __name__ == "__main__":
    main()
