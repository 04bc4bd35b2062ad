"""Write a 30-row synthetic table in the processed Cleveland layout (14 comma-separated fields).

Features are drawn inside each Cleveland column's range; the label is a noisy threshold on
age, thalach, and oldpeak, so every learner has some signal. Row 7 carries a "?" in ca to
exercise imputation.

usage: python3 make_tiny_synthetic.py > tiny_synthetic.data
"""
import random

rng = random.Random(7)
for i in range(30):
    age = rng.randint(35, 75)
    sex = rng.randint(0, 1)
    cp = rng.randint(1, 4)
    trestbps = rng.randint(100, 180)
    chol = rng.randint(150, 350)
    fbs = int(rng.random() < 0.15)
    restecg = rng.choice([0, 2])
    thalach = rng.randint(100, 190)
    exang = rng.randint(0, 1)
    oldpeak = round(rng.uniform(0.0, 4.0), 1)
    slope = rng.randint(1, 3)
    ca = rng.randint(0, 3)
    thal = rng.choice([3, 6, 7])
    score = 0.08 * (age - 55) - 0.04 * (thalach - 145) + 0.9 * (oldpeak - 1.5) + rng.gauss(0, 0.7)
    label = int(score > 0)
    ca_text = "?" if i == 7 else f"{ca:.1f}"
    fields = [f"{v:.1f}" for v in (age, sex, cp, trestbps, chol, fbs, restecg, thalach, exang, oldpeak, slope)]
    print(",".join(fields + [ca_text, f"{thal:.1f}", str(label)]))
