"""
HTTP routes for running bench programs on the simulated backend
"""

import os
import tempfile
import traceback
import logging

import numpy as np
from flask import jsonify, request

from .bench import BenchRunner, WeightedGraph
from .config import BENCH_SETTINGS, COST_SETTINGS
from .costmodel import PATTERNS, CostParams, predicted_time
from .errors import DpdError
from .runtime import RunConfig

logger = logging.getLogger(__name__)

BENCH_PROGRAMS = {
    'pi': 'midpoint-rule pi over n samples (n, blocked)',
    'seed': 'all ranks agree on the minimum proposed timestamp',
    'matreduce': 'ordered k x k matrix product, tree vs linear reduce (k, matrix_seed, matrices)',
    'floyd': '2D-blocked all-pairs shortest paths on a q x q grid (q, graph or nodes/graph_seed)',
}


def _graph_from_request(body):
    if 'graph' in request.files:
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'graph.txt')
            request.files['graph'].save(path)
            return WeightedGraph.from_file(path)
    if 'graph' in body:
        rows = [[np.inf if v is None else v for v in row] for row in body['graph']]
        return WeightedGraph.from_matrix(np.asarray(rows, dtype=np.float64))
    if 'nodes' in body:
        return WeightedGraph.random(int(body['nodes']), int(body.get('graph_seed', 0)))
    raise DpdError("floyd needs 'graph' (matrix or uploaded file) or 'nodes'")


def register_bench_routes(app):
    """Register all bench routes with the Flask app"""

    @app.route('/bench/programs', methods=['GET'])
    def bench_programs():
        return jsonify({'programs': BENCH_PROGRAMS})

    @app.route('/bench/<program>', methods=['POST'])
    def run_bench(program):
        """Run one bench program and return its report record plus cost checks"""
        try:
            if program not in BENCH_PROGRAMS:
                return jsonify({'error': f'Unknown program: {program}'}), 404
            body = request.get_json(silent=True) or request.form.to_dict()

            config = RunConfig(
                backend='sim',
                np=int(body.get('np', 1)),
                seed=int(body.get('seed', 0)),
                t_s=float(body.get('ts', COST_SETTINGS['t_s'])),
                t_w=float(body.get('tw', COST_SETTINGS['t_w'])))
            runner = BenchRunner(config)
            logger.info(f"Bench request: {program} np={config.np} seed={config.seed}")

            if program == 'pi':
                blocked = body.get('blocked')
                report = runner.run_pi(int(body['n']), None if blocked is None else bool(blocked))
            elif program == 'seed':
                report = runner.run_seed()
            elif program == 'matreduce':
                report = runner.run_matreduce(int(body.get('k', BENCH_SETTINGS['default_matrix_size'])),
                                              int(body.get('matrix_seed', 0)),
                                              int(body['matrices']) if body.get('matrices') is not None else None)
            else:
                report = runner.run_floyd(_graph_from_request(body), int(body['q']))

            return jsonify({
                'report': report.record,
                'cost_checks': report.check_frame().to_dict(orient='records'),
                'matches_model': report.matches_model,
                'text': report.lines(),
            })

        except KeyError as e:
            return jsonify({'error': f'Missing parameter: {e.args[0]}'}), 400
        except (DpdError, ValueError) as e:
            logger.warning(f"Bench {program} rejected: {str(e)}")
            return jsonify({'error': str(e)}), 400
        except Exception as e:
            error_traceback = traceback.format_exc()
            logger.error(f"CRITICAL ERROR in bench {program}: {str(e)}")
            logger.error(f"TRACEBACK: {error_traceback}")
            return jsonify({'error': f'Critical error: {str(e)}', 'traceback': error_traceback}), 500

    @app.route('/costmodel/predict', methods=['GET'])
    def costmodel_predict():
        """Closed-form time of a communication pattern: ?pattern=&p=&m=[&ts=&tw=&tlambda=]"""
        try:
            pattern = request.args.get('pattern', 'reduce')
            if pattern not in PATTERNS:
                return jsonify({'error': f'Unknown pattern: {pattern}', 'patterns': list(PATTERNS)}), 400
            p = int(request.args['p'])
            m = float(request.args.get('m', 1))
            params = CostParams(float(request.args.get('ts', COST_SETTINGS['t_s'])),
                                float(request.args.get('tw', COST_SETTINGS['t_w'])))
            t_lambda = float(request.args.get('tlambda', 0.0))
            seconds = predicted_time(pattern, p, m, params, t_lambda)
            return jsonify({'pattern': pattern, 'p': p, 'm': m, 't_s': params.t_s, 't_w': params.t_w,
                            't_lambda': t_lambda, 'predicted_time': seconds})
        except KeyError as e:
            return jsonify({'error': f'Missing parameter: {e.args[0]}'}), 400
        except (DpdError, ValueError) as e:
            return jsonify({'error': str(e)}), 400
