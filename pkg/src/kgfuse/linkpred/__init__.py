"""Link prediction: datasets, embedding models, training, ranking."""
from .data import TripleDataset, cycle_dataset, load_triples_tsv, write_triples_tsv
from .models import ComplExModel, DistMultModel, RotatEModel, TransEModel, build_model
from .ranking import RankingReport, evaluate_ranking, rank_query, summarize_ranks
from .train import TrainConfig, train_model

__all__ = [
    "TripleDataset",
    "cycle_dataset",
    "load_triples_tsv",
    "write_triples_tsv",
    "TransEModel",
    "DistMultModel",
    "ComplExModel",
    "RotatEModel",
    "build_model",
    "TrainConfig",
    "train_model",
    "RankingReport",
    "evaluate_ranking",
    "rank_query",
    "summarize_ranks",
]
