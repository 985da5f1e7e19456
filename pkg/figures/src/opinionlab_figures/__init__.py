"""Figure rendering for opinionlab result CSVs."""

from .io import BandFile, BranchSeries, RecordFile, SchemaError, read_band_file, read_record_file
from .plotting import FigureSpec, plot_bands, plot_intervention

__version__ = "0.1.0"
