import os
import logging
import tempfile

import numpy as np
from flask import Flask, jsonify, request

from dpdlib import register_bench_routes
from dpdlib.bench import WeightedGraph
from dpdlib.errors import DpdError

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

app = Flask(__name__)
app.config['MAX_CONTENT_LENGTH'] = 64 * 1024 * 1024  # graph uploads


@app.route('/', methods=['GET'])
def index():
    return jsonify({
        'service': 'dpdlib',
        'endpoints': {
            'GET /bench/programs': 'list bench programs',
            'POST /bench/<program>': 'run a bench program on the simulated backend',
            'GET /costmodel/predict': 'closed-form time of a communication pattern',
            'POST /graph/parse': 'validate a Floyd-Warshall graph file',
        },
    })


@app.route('/graph/parse', methods=['POST'])
def parse_graph():
    """
    Accept a graph file (first line n, then n rows of n weights, "inf" for no
    edge) and return its size, edge count and the weight matrix with null for +inf.
    """
    try:
        if 'graph' not in request.files:
            return jsonify({'error': 'No graph file uploaded'}), 400
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'graph.txt')
            request.files['graph'].save(path)
            graph = WeightedGraph.from_file(path)
        edges = int(np.isfinite(graph.w).sum() - graph.n)
        logger.info(f"Parsed graph with {graph.n} nodes and {edges} edges")
        weights = [[None if np.isinf(v) else float(v) for v in row] for row in graph.w]
        return jsonify({'n': graph.n, 'edges': edges, 'graph': weights})
    except DpdError as e:
        return jsonify({'error': str(e)}), 400
    except Exception as e:
        logger.error(f"Error parsing graph: {str(e)}")
        return jsonify({'error': f'Could not parse graph: {str(e)}'}), 400


register_bench_routes(app)

if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5001))
    app.run(debug=True, port=port)
