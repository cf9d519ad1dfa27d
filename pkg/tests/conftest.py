"""Shared scenario builders for the test suite."""

import pytest

from afmsim.controllers import ControllerSpec
from afmsim.scenarios import triangle3
from afmsim.topology import Link, SystemParams, Topology, validate


def two_node_scenario(
    omega_u=(1.0, 1.0),
    theta0=(0.5, 0.5),
    beta0=7,
    latency=1.0,
    capacity=None,
    omega_min=0.1,
    epoch=-25.0,
):
    links = {(1, 2): Link(latency=latency), (2, 1): Link(latency=latency)}
    return validate(
        Topology(n_nodes=2, links=links, buffer_capacity=capacity),
        SystemParams(
            p=10,
            d=2,
            omega_min=omega_min,
            epoch=epoch,
            theta0=theta0,
            omega_u=omega_u,
            omega_init1=omega_u,
            omega_init2=omega_u,
            beta0={(1, 2): beta0, (2, 1): beta0},
        ),
    )


@pytest.fixture(scope="session")
def triangle_cfg():
    return triangle3()


@pytest.fixture
def zero_spec():
    return ControllerSpec(kind="zero")
