from setuptools import setup, find_packages

# Obtain the long description from README.md
# If possible, use pypandoc to convert the README from Markdown
# to reStructuredText, as this is the only supported format on PyPI
try:
    import pypandoc
    long_description = pypandoc.convert_file('./README.md', 'rst')
except (ImportError, RuntimeError, OSError):
    long_description = open('./README.md').read()
# Get the package requirements from the requirements.txt file
with open('requirements.txt') as f:
    install_requires = [line.strip('\n') for line in f.readlines() if line.strip()]

setup(
    name='dbaops',
    version='0.1.0',
    description='Commuting difference operators from discrete Baker-Akhiezer modules',
    long_description=long_description,
    packages=find_packages('.', exclude=['tests']),
    package_data={'dbaops': ['schemas/*.json', 'templates/*.template']},
    tests_require=['pytest'],
    install_requires=install_requires,
    include_package_data=True,
    python_requires='>=3.8',
    entry_points={'console_scripts': ['dbaops=dbaops.cli:main']},
    platforms='any',
    classifiers=[
        'Programming Language :: Python',
        'Natural Language :: English',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'Operating System :: OS Independent',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Programming Language :: Python :: 3'],
    )
