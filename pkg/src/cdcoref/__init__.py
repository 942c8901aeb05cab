"""Cross-document coreference resolution.

Two-stage pipeline: exact KNN candidate retrieval in a learned mention
embedding space, a pairwise classifier trained on the retrieved hard pairs,
and greedy edge-local agglomerative clustering; plus the standard coreference
metric suite and a masking/window ablation harness.
"""

from .corpus import (Corpus, Document, Mention, Partition, Sentence, MASK_TOKEN,
                     TOKEN_TAGS, context_window, load_corpus, mask_tokens,
                     merge_corpora, parse_corpus, save_corpus, serialize_corpus)
from .embedfile import read_embeddings, write_embeddings
from .encoder import (CentroidTable, EncoderConfig, EncoderParams, FeatureVector,
                      MentionEmbedding, MentionVectorizer, ImportedVectorizer,
                      compute_centroids, embed_all, embed_mention,
                      featurize_mention, loss_and_grad, select_hard_negatives,
                      score_mention_cluster, train_encoder)
from .retrieval import (CandidatePair, NeighborIndex, PairRecord, build_index,
                        generate_pairs, label_pairs, make_pair, pair_recall,
                        query_knn, read_pairs_jsonl, write_pairs_jsonl)
from .pairwise import (PairwiseConfig, ScoredPair, ScorerParams,
                       load_external_scores, oracle_score, oracle_scorer,
                       pair_representation, score_pair, train_pairwise,
                       trained_scorer)
from .clustering import (ClusterState, MergeEvent, cluster_pair_score,
                         filter_and_sort_pairs, greedy_cluster)
from .metrics import (MetricReport, MetricTriple, b_cubed, ceaf_e, conll_f1,
                      evaluate, lea, muc)
from .pipeline import (PipelineConfig, harmonic_mean_report, run_ablations,
                       run_oracle_study, run_pipeline, run_stage)
from .synth import make_synthetic_corpus

__version__ = "0.1.0"
