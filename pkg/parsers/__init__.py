# Parsers Package
from parsers.config_parser import parse_number_list, read_config_file
from parsers.csv_parser import DatasetParser, read_dataset, write_dataset
