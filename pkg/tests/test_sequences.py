"""Sequence extension: enumeration, per-position errors, the divergence chain."""

import itertools
import math

import numpy as np
import pytest

from errorbound.bounds import BoundThreshold, linear_intercept, refined_bound
from errorbound.decisions import global_errors
from errorbound.distributions import (
    JointDistribution,
    PosteriorModel,
    cross_entropy,
    entropy,
    kl_divergence,
    validate,
)
from errorbound.errors import (
    BadShapeError,
    DomainError,
    EmptySampleError,
    LengthMismatchError,
    ShapeMismatchError,
    ZeroMassObservationError,
)
from errorbound.sequences import (
    CHAIN_HEADER,
    DEMO_HEADER,
    SequenceTask,
    ce_error_bound_check,
    ce_loss,
    chain_csv_lines,
    demo_csv_lines,
    empirical_joint,
    expected_sequence_error,
    expected_sequence_error_direct,
    hamming_loss,
    index_to_sequence,
    kl_chain,
    position_marginal,
    position_table,
    ppl_wer_demo,
    random_task,
    read_task,
    sequence_errors,
    sequence_to_index,
    with_sequence_prior,
    write_task,
)

from oracles import exhaustive_bayes_error, expected_hamming_oracle

LN8 = 2.0794415416798357


class TestIndexing:
    def test_round_trip_every_rank(self):
        for length, num_classes in [(1, 2), (3, 2), (2, 5), (4, 3)]:
            for i in range(num_classes**length):
                seq = index_to_sequence(i, length, num_classes)
                assert len(seq) == length
                assert sequence_to_index(seq, num_classes) == i

    def test_order_matches_lexicographic_product(self):
        enumerated = [index_to_sequence(i, 3, 3) for i in range(27)]
        assert enumerated == list(itertools.product(range(3), repeat=3))

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            index_to_sequence(8, 3, 2)
        with pytest.raises(DomainError):
            index_to_sequence(-1, 3, 2)
        with pytest.raises(DomainError):
            sequence_to_index((0, 2), 2)
        with pytest.raises(DomainError):
            sequence_to_index((), 2)


class TestHamming:
    def test_extremes_and_fractions(self):
        assert hamming_loss((0, 1, 2), (0, 1, 2)) == 0.0
        assert hamming_loss((0, 0, 0), (1, 1, 1)) == 1.0
        assert hamming_loss((0, 1, 1, 0), (0, 1, 0, 0)) == 0.25

    def test_rejects_mismatched_and_empty(self):
        with pytest.raises(LengthMismatchError):
            hamming_loss((0, 1), (0, 1, 2))
        with pytest.raises(DomainError):
            hamming_loss((), ())


class TestPositionTables:
    def test_product_structure_factorizes(self):
        # independent positions: the marginal at n recovers that factor
        rng = np.random.default_rng(5)
        factors = [rng.dirichlet(np.ones(3)) for _ in range(2)]
        rows = [
            factors[0][a] * factors[1][b] for a, b in itertools.product(range(3), repeat=2)
        ]
        weights = np.array(rows)[:, None]
        for n in range(2):
            table = position_table(weights, 2, 3, n)
            assert np.allclose(table[:, 0], factors[n], atol=1e-15)

    def test_length_one_is_a_passthrough(self):
        weights = np.random.default_rng(1).dirichlet(np.ones(6)).reshape(2, 3)
        out = position_table(weights, 1, 2, 0)
        assert np.array_equal(out, weights)

    def test_position_must_be_in_range(self):
        weights = np.full((4, 1), 0.25)
        with pytest.raises(DomainError):
            position_table(weights, 2, 2, 2)
        with pytest.raises(DomainError):
            position_table(weights, 2, 2, -1)

    def test_marginal_normalizes_and_flags_dead_columns(self):
        task = random_task(0, 0, length=2, num_classes=2, x_count=3, threshold=0.2)
        for x in range(3):
            for n in range(2):
                column = position_marginal(task, x, n)
                assert column.shape == (2,)
                assert math.fsum(column) == pytest.approx(1.0, abs=1e-12)
        dead = validate([[0.625, 0.0], [0.0, 0.0], [0.0, 0.0], [0.375, 0.0]])
        dead_task = SequenceTask(2, 2, dead, dead, 0.45)
        with pytest.raises(ZeroMassObservationError):
            position_marginal(dead_task, 1, 0)


class TestExpectedError:
    def test_point_mass_truth(self):
        joint = validate([[0.0], [0.0], [1.0], [0.0]])
        task = SequenceTask(2, 2, joint, joint, 0.0)
        assert expected_sequence_error(task, 0, (1, 0)) == 0.0
        assert expected_sequence_error(task, 0, (0, 1)) == 1.0
        assert expected_sequence_error(task, 0, (1, 1)) == 0.5

    def test_independent_positions_average_their_hit_rates(self):
        # truth is the product [0.7, 0.3] x [0.7, 0.3] on one observation
        factor = np.array([0.7, 0.3])
        joint = validate(np.outer(factor, factor).ravel()[:, None])
        task = SequenceTask(2, 2, joint, joint, 0.35)
        assert expected_sequence_error(task, 0, (0, 0)) == pytest.approx(0.3, abs=1e-12)
        assert expected_sequence_error(task, 0, (1, 0)) == pytest.approx(0.5, abs=1e-12)
        assert expected_sequence_error(task, 0, (1, 1)) == pytest.approx(0.7, abs=1e-12)

    def test_marginal_form_equals_direct_enumeration(self):
        for i in range(20):
            task = random_task(77, i, length=3, num_classes=2, x_count=2, threshold=0.3)
            seq = index_to_sequence(i % 8, 3, 2)
            for x in range(2):
                via_marginals = expected_sequence_error(task, x, seq)
                direct = expected_sequence_error_direct(task, x, seq)
                assert via_marginals == pytest.approx(direct, abs=1e-12)

    def test_against_brute_force_oracle(self):
        task = random_task(3, 4, length=2, num_classes=3, x_count=2, threshold=0.25)
        post = task.true_joint.weights[:, 1] / task.true_joint.weights[:, 1].sum()
        sequences = [index_to_sequence(i, 2, 3) for i in range(9)]
        expected = expected_hamming_oracle(post, sequences, (2, 1))
        assert expected_sequence_error(task, 1, (2, 1)) == pytest.approx(expected, abs=1e-12)

    def test_rejects_malformed_queries(self):
        task = random_task(0, 0, length=2, num_classes=2, x_count=2, threshold=0.2)
        with pytest.raises(LengthMismatchError):
            expected_sequence_error(task, 0, (0, 1, 0))
        with pytest.raises(DomainError):
            expected_sequence_error(task, 0, (0, 5))


class TestSequenceErrors:
    def test_matched_model_has_zero_mismatch(self):
        task = random_task(11, 0, 2, 3, 3, 0.3, model_form="matched")
        report = sequence_errors(task)
        assert report.per_position_delta == (0.0, 0.0)
        assert report.mean_delta == 0.0
        assert report.model_error == report.bayes_error

    def test_length_one_reduces_to_flat_decisions(self):
        task = random_task(8, 1, 1, 4, 5, 0.4, model_form="joint")
        report = sequence_errors(task)
        bayes, model_err, gap = global_errors(
            task.true_joint.weights, task.model.weights
        )
        assert report.bayes_error == bayes
        assert report.model_error == model_err
        assert report.mean_delta == gap

    def test_per_position_against_exhaustive_oracle(self):
        for i in range(25):
            task = random_task(21, i, 2, 2, 2, 0.45, model_form="joint")
            report = sequence_errors(task)
            oracle_terms = [
                exhaustive_bayes_error(position_table(task.true_joint.weights, 2, 2, n))
                for n in range(2)
            ]
            assert report.bayes_error == pytest.approx(
                math.fsum(oracle_terms) / 2, abs=1e-12
            )

    def test_mismatch_decomposes_over_positions(self):
        for i in range(30):
            form = "joint" if i % 2 == 0 else "conditional"
            task = random_task(31, i, 3, 2, 3, 0.3, model_form=form)
            report = sequence_errors(task)
            assert all(d >= -1e-12 for d in report.per_position_delta)
            assert report.model_error - report.bayes_error == pytest.approx(
                report.mean_delta, abs=1e-12
            )
            assert report.mean_delta == pytest.approx(
                math.fsum(report.per_position_delta) / 3, abs=1e-15
            )


class TestChain:
    def test_matched_model_is_all_zero(self):
        task = random_task(2, 5, 2, 2, 3, 0.3, model_form="matched")
        report = kl_chain(task)
        assert report.chain() == (0.0, 0.0, 0.0, 0.0, 0.0)
        assert report.links() == (True, True, True, True)

    def test_length_one_collapses_middle_links(self):
        task = random_task(9, 3, 1, 3, 4, 0.4, model_form="joint")
        report = kl_chain(task)
        assert report.kl_conditional == report.kl_marginal_avg
        assert report.kl_joint == kl_divergence(
            task.true_joint.weights, task.model.weights
        )
        assert report.h_avg == report.h_of_mean
        assert all(report.links())

    def test_conditional_model_makes_first_link_tight(self):
        task = random_task(14, 2, 2, 2, 3, 0.3, model_form="conditional")
        report = kl_chain(task)
        assert report.kl_joint == pytest.approx(report.kl_conditional, abs=1e-10)

    def test_links_hold_over_many_random_tasks(self):
        shapes = [(1, 2, 2), (2, 2, 3), (3, 2, 2), (2, 3, 4), (1, 3, 3)]
        for i in range(100):
            length, num_classes, x_count = shapes[i % len(shapes)]
            form = "joint" if i % 2 == 0 else "conditional"
            task = random_task(47, i, length, num_classes, x_count, 0.2, model_form=form)
            report = kl_chain(task)
            assert all(report.links()), f"broken link in task {i}: {report.chain()}"

    def test_infinite_divergence_stays_leftmost(self):
        truth = validate([[0.4, 0.05], [0.03, 0.02], [0.02, 0.03], [0.05, 0.4]])
        # a conditional model with a hole at a live cell: conditioning sees
        # the zero, but position marginals fill it in from the other symbol
        columns = np.array(
            [[0.0, 0.25], [0.5, 0.25], [0.25, 0.25], [0.25, 0.25]]
        )
        task = SequenceTask(2, 2, truth, PosteriorModel(columns), 0.45)
        report = kl_chain(task)
        assert report.kl_joint == math.inf
        assert report.kl_conditional == math.inf
        assert math.isfinite(report.kl_marginal_avg)
        assert all(report.links())

    def test_log_base_two_scales_every_entry(self):
        task = random_task(6, 1, 2, 2, 2, 0.3, model_form="joint")
        nats = kl_chain(task)
        bits = kl_chain(task, log_base=2.0)
        for a, b in zip(nats.chain(), bits.chain()):
            assert b == a / math.log(2.0)


class TestTaskValidation:
    def test_enumeration_cap(self):
        with pytest.raises(DomainError):
            random_task(0, 0, 8, 3, 2, 0.2)

    def test_shape_mismatch(self):
        truth = validate(np.full((4, 2), 0.125))
        wrong = validate(np.full((4, 3), 1.0 / 12.0))
        with pytest.raises(ShapeMismatchError):
            SequenceTask(2, 2, truth, wrong, 0.45)

    def test_per_position_threshold_is_enforced(self):
        uniform = validate(np.full((4, 1), 0.25))
        with pytest.raises(DomainError):
            SequenceTask(2, 2, uniform, uniform, 0.01)
        with pytest.raises(DomainError):
            SequenceTask(2, 2, uniform, uniform, 0.45)
        factor = np.array([0.7, 0.3])
        product = validate(np.outer(factor, factor).ravel()[:, None])
        SequenceTask(2, 2, product, product, 0.3)  # exactly at the cap

    def test_threshold_coerces_from_float(self):
        task = random_task(0, 0, 2, 2, 2, 0.3)
        assert isinstance(task.threshold, BoundThreshold)
        assert task.threshold.t == 0.3

    def test_random_task_rejects_unknown_form(self):
        with pytest.raises(DomainError):
            random_task(0, 0, 2, 2, 2, 0.3, model_form="oracle")


class TestEmpirical:
    def test_single_sample_is_a_point_mass(self):
        dist = empirical_joint([((1, 0), 2)], 2, 2, 3)
        expected = np.zeros((4, 3))
        expected[2, 2] = 1.0
        assert np.array_equal(dist.weights, expected)

    def test_counts_split_three_to_one(self):
        samples = [((0, 1), 0)] * 3 + [((1, 1), 0)]
        dist = empirical_joint(samples, 2, 2, 1)
        assert dist.weights[1, 0] == 0.75
        assert dist.weights[3, 0] == 0.25

    def test_rejects_empty_and_bad_rows(self):
        with pytest.raises(EmptySampleError):
            empirical_joint([], 2, 2, 1)
        with pytest.raises(LengthMismatchError):
            empirical_joint([((0,), 0)], 2, 2, 1)
        with pytest.raises(DomainError):
            empirical_joint([((0, 1), 5)], 2, 2, 1)

    def test_loss_against_uniform_model_is_log_count(self):
        q = validate(np.full((8, 1), 0.125))
        loss = ce_loss([((0, 0, 1), 0), ((1, 1, 0), 0)], q, 3, 2)
        assert loss == pytest.approx(LN8, abs=1e-15)

    def test_loss_equals_cross_entropy_of_empirical(self):
        task = random_task(13, 0, 2, 2, 2, 0.3, model_form="joint")
        rng = np.random.default_rng(99)
        flat = task.true_joint.weights.ravel()
        draws = rng.choice(flat.size, size=40, p=flat / flat.sum())
        samples = [
            (index_to_sequence(int(d) // 2, 2, 2), int(d) % 2) for d in draws
        ]
        emp = empirical_joint(samples, 2, 2, 2)
        direct = ce_loss(samples, task.model, 2, 2)
        assert direct == pytest.approx(
            cross_entropy(emp.weights, task.model.weights), abs=1e-12
        )

    def test_unsupported_sample_is_infinite(self):
        q = validate([[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.5]])
        assert ce_loss([((0, 1), 0)], q, 2, 2) == math.inf
        with pytest.raises(EmptySampleError):
            ce_loss([], q, 2, 2)


class TestCeBound:
    def test_matched_model_clears_bound_by_beta(self):
        task = random_task(17, 0, 2, 2, 3, 0.25, model_form="matched")
        report = ce_error_bound_check(task)
        assert report.holds
        # matched model: lhs is H(pr) and the error terms cancel, so the
        # slack is exactly -beta(t) > 0
        slack = report.lhs - report.rhs
        assert slack == pytest.approx(-linear_intercept(0.25), abs=1e-12)

    def test_holds_across_random_tasks_and_forms(self):
        for i in range(60):
            form = ("joint", "conditional", "matched", "prior")[i % 4]
            task = random_task(53, i, 2, 2, 3, 0.05, model_form=form)
            assert ce_error_bound_check(task).holds

    def test_infinite_loss_holds_trivially(self):
        truth = validate([[0.4, 0.05], [0.03, 0.02], [0.02, 0.03], [0.05, 0.4]])
        holed = validate([[0.0, 0.1], [0.4, 0.1], [0.1, 0.1], [0.1, 0.1]])
        report = ce_error_bound_check(SequenceTask(2, 2, truth, holed, 0.45))
        assert report.lhs == math.inf and report.holds

    def test_zero_threshold_has_no_linear_bound(self):
        truth = validate([[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.5]])
        task = SequenceTask(2, 2, truth, truth, 0.0)
        with pytest.raises(DomainError):
            ce_error_bound_check(task)


class TestPriorComposition:
    def test_composition_keeps_observation_law(self):
        task = random_task(19, 0, 2, 2, 3, 0.3)
        truth = task.true_joint
        used = np.flatnonzero(truth.weights.sum(axis=1) > 0.0)
        prior = np.zeros(4)
        prior[used] = np.random.default_rng(7).dirichlet(np.ones(used.size))
        composed = with_sequence_prior(truth, prior)
        row_mass = truth.weights.sum(axis=1)
        for s in used:
            expected = prior[s] * truth.weights[s] / row_mass[s]
            assert np.allclose(composed.weights[s], expected, atol=1e-15)

    def test_rejects_prior_on_dead_sequence(self):
        truth = validate([[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.5]])
        with pytest.raises(DomainError):
            with_sequence_prior(truth, [0.25, 0.5, 0.0, 0.25])
        with pytest.raises(ShapeMismatchError):
            with_sequence_prior(truth, [0.5, 0.5])


class TestPplDemo:
    @staticmethod
    def _family(size):
        base = random_task(29, 0, 2, 3, 3, 0.05, model_form="prior")
        truth = base.true_joint
        matched = SequenceTask(
            2, 3, truth, with_sequence_prior(truth, truth.weights.sum(axis=1)), 0.05
        )
        tasks = [matched]
        used = np.flatnonzero(truth.weights.sum(axis=1) > 0.0)
        for k in range(size):
            rng = np.random.default_rng(1000 + k)
            prior = np.zeros(truth.num_classes)
            prior[used] = rng.dirichlet(np.ones(used.size))
            tasks.append(SequenceTask(2, 3, truth, with_sequence_prior(truth, prior), 0.05))
        return tasks

    def test_every_row_holds_and_matched_is_minimal(self):
        tasks = self._family(25)
        rows = ppl_wer_demo(tasks, ids=["matched"] + [f"p{k}" for k in range(25)])
        assert all(row.holds for row in rows)
        matched = rows[0]
        assert matched.model_id == "matched"
        assert matched.log_ppl == min(row.log_ppl for row in rows)
        assert matched.hamming_error == min(row.hamming_error for row in rows)
        assert all(row.log_ppl_per_token == row.log_ppl / 2 for row in rows)

    def test_rejects_mixed_truth_or_uncomposed_models(self):
        tasks = self._family(2)
        stranger = random_task(30, 1, 2, 3, 3, 0.05, model_form="prior")
        with pytest.raises(DomainError):
            ppl_wer_demo([tasks[0], stranger])
        plain = random_task(29, 0, 2, 3, 3, 0.05, model_form="joint")
        with pytest.raises(DomainError):
            ppl_wer_demo([tasks[0], plain])
        conditional = random_task(29, 0, 2, 3, 3, 0.05, model_form="conditional")
        with pytest.raises(DomainError):
            ppl_wer_demo([conditional])
        with pytest.raises(LengthMismatchError):
            ppl_wer_demo(tasks, ids=["just_one"])
        with pytest.raises(EmptySampleError):
            ppl_wer_demo([])


class TestTextRoundTrip:
    def test_joint_model_round_trips_bitwise(self):
        task = random_task(41, 0, 2, 2, 3, 0.3, model_form="joint")
        text = write_task(task)
        back = read_task(text)
        assert np.array_equal(back.true_joint.weights, task.true_joint.weights)
        assert np.array_equal(back.model.weights, task.model.weights)
        assert isinstance(back.model, JointDistribution)
        assert back.threshold.t == task.threshold.t
        assert write_task(back) == text

    def test_conditional_model_round_trips(self):
        task = random_task(41, 1, 2, 2, 3, 0.3, model_form="conditional")
        back = read_task(write_task(task))
        assert isinstance(back.model, PosteriorModel)
        assert np.array_equal(back.model.columns, task.model.columns)

    def test_prior_form_composes_on_read(self):
        task = random_task(41, 2, 1, 2, 2, 0.3)
        truth_lines = write_task(task).splitlines()[:3]
        text = "\n".join(truth_lines + ["PRIOR", "0.5 0.5"]) + "\n"
        back = read_task(text)
        expected = with_sequence_prior(task.true_joint, [0.5, 0.5])
        assert np.array_equal(back.model.weights, expected.weights)

    def test_comments_and_blank_lines_are_ignored(self):
        task = random_task(41, 3, 1, 2, 2, 0.3, model_form="joint")
        body = write_task(task).splitlines()
        noisy = "\n".join(["# fixture", "", body[0], "# tables", *body[1:], ""])
        assert write_task(read_task(noisy)) == write_task(task)

    def test_cap_is_checked_before_tables_are_parsed(self):
        with pytest.raises(DomainError):
            read_task("12 3 2 0.1\n")

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "2 2 0.1\n",
            "1 2 2 x\n",
            "1 2 2 0.1\n0.5 0.5\n",
            "1 2 2 0.1\n0.4 0.1\n0.1 0.4\n0.5 0.5\n",
            "1 2 2 0.1\n0.4 0.1\n0.1 0.4\nPRIOR\n0.5\n",
        ],
    )
    def test_malformed_text_is_rejected(self, text):
        with pytest.raises(BadShapeError):
            read_task(text)


class TestCsv:
    def test_chain_lines(self):
        task = random_task(2, 5, 2, 2, 3, 0.3, model_form="matched")
        lines = chain_csv_lines([kl_chain(task)], ids=["t0"])
        assert lines[0] == CHAIN_HEADER
        assert lines[1] == "t0,0.0,0.0,0.0,0.0,0.0,0.0,true,true,true,true"
        unnamed = chain_csv_lines([kl_chain(task)])
        assert unnamed[1].startswith("0,")

    def test_demo_lines(self):
        tasks = TestPplDemo._family(1)
        lines = demo_csv_lines(ppl_wer_demo(tasks))
        assert lines[0] == DEMO_HEADER
        assert len(lines) == 3
        assert lines[1].startswith("model_0,") and lines[1].endswith(",true")
