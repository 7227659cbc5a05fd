# Copyright 2026 The LFP Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import random

import pytest


@pytest.fixture
def trips(tmp_path):
    """Small trip table with a text key, a date and a few nulls."""
    rng = random.Random(3)
    lines = ["pickup_datetime,passenger_count,fare_amount,tip_amount,payment_type"]
    for i in range(400):
        fare = round(rng.uniform(-5, 60), 2)
        tip = "" if i % 17 == 0 else str(round(rng.uniform(0, 9), 2))
        day = 1 + i % 28
        lines.append(f"2015-01-{day:02d} 0{i % 10}:15:00,{1 + i % 5},{fare},{tip},{rng.choice(['cash', 'card'])}")
    path = tmp_path / "trips.csv"
    path.write_text("\n".join(lines) + "\n")
    return path
